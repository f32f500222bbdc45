"""KP-Burgers numerical laboratory."""
