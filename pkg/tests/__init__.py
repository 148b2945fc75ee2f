"""Tests for periodic_asymptotics package."""
