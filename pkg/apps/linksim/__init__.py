"""Monte-Carlo simulation of the coded-modulation link."""
