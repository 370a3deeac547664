"""Datasets, the training loop and repeated experiments."""
