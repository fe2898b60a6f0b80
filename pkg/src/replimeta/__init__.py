"""replimeta: joint analysis of groups of replicated experiments."""

__version__ = "1.0.0"
