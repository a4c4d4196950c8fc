"""Sparse (BM25) and dense vector indexes with pluggable embedding providers"""
