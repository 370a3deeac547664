"""Minimal reverse-mode autodiff, the GRU kernel, Adam and tensor archives."""
