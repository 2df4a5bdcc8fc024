"""Tests for hcstream."""
