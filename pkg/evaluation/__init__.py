"""Retrieval metrics, similarity distributions, MCQ grading and reports"""
