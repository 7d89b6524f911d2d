//! Report emission (text / JSON / LaTeX) for the CLI.
