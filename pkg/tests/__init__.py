"""Tests for numconj."""
