"""Coherence-cost toolkit - Core package"""
