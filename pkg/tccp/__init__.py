"""tccp - Circuit quantization and coupling analysis for tunable-coupler transmon devices."""

__version__ = "0.1.0"
