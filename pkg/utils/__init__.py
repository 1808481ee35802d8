"""Coherence-cost toolkit - Utilities package"""
