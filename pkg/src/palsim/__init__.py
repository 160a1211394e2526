"""palsim: a headless grid-world evaluation stack speaking the PAL line
protocol over TCP, with task generators, a tournament manager and baseline
agents."""

__version__ = "0.1.0"
