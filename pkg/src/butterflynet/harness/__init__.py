"""Experiment harness: metrics, training loop, task runners, CLI."""
