"""Test suite for cp-branching."""
