"""Information design against majority voting: when a designer's private
signal can overturn the jury theorem, and how."""

__version__ = "0.1.0"
