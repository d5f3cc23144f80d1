"""Counterspeech response selection toolkit.

Builds a counterspeech candidate pool from training conversations,
enlarges it with a pluggable generator, prunes ungrammatical candidates,
ranks candidates for a hate-speech input with a learned linear embedding
map, and evaluates selections with n-gram diversity and relevance
metrics.
"""

__version__ = "0.1.0"
