"""Command line front end: argument handlers and named presets."""
