"""Sentence-level diff engine for news article revision histories.

Extracts additions, deletions, edits and refactors between adjacent
versions of an article, persists them in a relational diff store, computes
corpus analytics, and builds/evaluates edit-prediction task datasets.
"""

__version__ = "0.1.0"
