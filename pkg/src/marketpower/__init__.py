"""Day-ahead electricity market simulator with a DDPG-bidding strategic GenCo group."""

__version__ = "0.1.0"
