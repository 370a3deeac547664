"""Node embeddings and the pair encoder/classifier."""
