"""Voice-control core: deterministic command orchestration for hands-free use.

Turns timed recognition events into synthetic keyboard/mouse actions via
stacked grammars, grid pointer addressing, dictation substitution,
correction sessions and a local HTTP bridge that lets a browser-hosted
speech client act as the continuous-dictation recognizer.
"""

__version__ = "0.1.0"
