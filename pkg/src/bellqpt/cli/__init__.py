"""Command-line front end (``bellqpt``)."""
