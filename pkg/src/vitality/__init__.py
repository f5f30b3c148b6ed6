"""Urban vitality index engine: indicators to ranked, explained, forecast scores."""

__version__ = "1.0.0"
