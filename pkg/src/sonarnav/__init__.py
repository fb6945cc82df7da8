"""sonarnav: deterministic 2D simulator of ultrasonic-ranging navigation.

A simulated robot sweeps an ultrasonic sensor over -90..90 degrees, builds
local and global log-odds occupancy maps from the echoes, plans with an
artificial potential field, and dead-reckons toward a goal. A standalone
echo-motion filter classifies approaching/leaving targets from ping-delay
streams. Everything is seeded and reproducible.
"""

__version__ = "0.1.0"
