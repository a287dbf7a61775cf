"""Tests for the IRS secrecy lab."""
