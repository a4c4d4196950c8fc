"""Contrastive adapter fine-tuning"""
