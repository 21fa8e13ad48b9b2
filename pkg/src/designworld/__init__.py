"""Design-World: simulated collaborative planning dialogues under limited attention."""

__version__ = "0.1.0"
