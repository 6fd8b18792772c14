"""Hierarchical embeddings of Han logographs from recursive decompositions.

Subpackages: ``ids`` (decomposition parsing), ``phono`` (Cantonese
pronunciation data), ``autodiff`` (tensor engine), ``encoders`` (tree and
sequence encoders), ``pron`` (pronunciation prediction), ``lm`` (character
language modeling), ``diagnostics`` (interpretability), ``cli`` (command
line).
"""

__version__ = "0.1.0"
