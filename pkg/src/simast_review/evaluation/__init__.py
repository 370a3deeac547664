"""Classification metrics, significance tests and corpus statistics."""
