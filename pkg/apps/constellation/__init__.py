"""ASK constellation, bit-level L-value statistics and shaping."""
