"""Services module initialization."""
