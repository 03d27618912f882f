"""Mixed-derivative total variation for pixel-based inverse problems."""
