"""Command-line pipeline: file-driven configs, run manifests, management commands."""
