"""Java fragment parsing, AST simplification and graph construction."""
