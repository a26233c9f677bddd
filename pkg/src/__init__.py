"""metasense - resonant metamaterial permittivity sensor toolkit."""

__version__ = "1.0.0"
