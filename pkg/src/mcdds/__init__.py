"""Molecular-communication drug delivery simulator for IDRM charging."""

__version__ = "0.1.0"
