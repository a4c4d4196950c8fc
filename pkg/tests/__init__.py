"""Tests package for specqa"""
