"""Compositional NLP compiler and trainer.

Sentences become typed pregroup string diagrams, which are rewritten,
compiled into parameterized quantum circuits or tensor networks, and
trained as binary classifiers with the built-in simulator and optimizers.
"""

__version__ = "0.1.0"
