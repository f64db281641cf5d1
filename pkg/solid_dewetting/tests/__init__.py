"""Unit tests for solid_dewetting."""
