"""Runtime support for generated assessment scripts."""
