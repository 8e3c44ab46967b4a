"""Ambient helpers: logging setup and structured file loading."""
