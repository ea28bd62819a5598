"""Benchmark harness for LLM-driven discovery of continuous black-box optimizers."""

__version__ = "0.1.0"
