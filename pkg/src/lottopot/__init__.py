"""Expected-return analysis for a syndicate that buys every ticket in a jackpot-sharing lotto."""

__version__ = "0.1.0"
