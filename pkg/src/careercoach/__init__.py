"""careercoach: resume parsing, career-tree mapping, skill-gap reports, and
embedding-based course recommendations behind one HTTP API and CLI."""

__version__ = "0.1.0"
