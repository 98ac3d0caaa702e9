"""Verification checks; every AbstractCheck subclass here is registered on import of src.verify."""
