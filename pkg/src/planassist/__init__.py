"""Demand-planning decision assistant.

Core package behind the ``assistant`` CLI and the HTTP service: demand
ingestion, per-series forecasting, local surrogate explanations, a
transport-scheduling recommender, feedback capture, a provenance
knowledge graph, and committee-based query ranking.
"""

__version__ = "0.1.0"
