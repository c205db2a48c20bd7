"""Desk-scale ground-station stack around a simulated HC-12 radio link."""

__version__ = "0.1.0"
