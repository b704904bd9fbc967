"""Relational verification of while programs via annotated product automata."""
__version__ = "0.1.0"
