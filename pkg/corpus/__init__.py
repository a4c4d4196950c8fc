"""Hybrid text and table corpus: models, tokenizer, splitting, loading and ingest"""
