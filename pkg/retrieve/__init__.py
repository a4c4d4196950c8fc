"""Retriever methods, passage/document representations and table resolution"""
