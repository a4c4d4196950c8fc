"""Sub-commands of the specqa CLI, one module each"""
