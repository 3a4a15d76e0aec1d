"""Knowledge-grounded task planning with LLM decomposition and human-in-the-loop repair."""

__version__ = "0.1.0"
