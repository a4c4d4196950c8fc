"""Generative reader, prompts and synthetic QA generation"""
