"""Deterministic LTE radio-network planning: antenna ERP fitting, link budgets,
RSRP/SINR/throughput rasters under PUSC 1x3x3 reuse, and drive-test comparison."""

__version__ = "0.1.0"
