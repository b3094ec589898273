"""Prompting, completion backends, reassembly and string recovery."""
