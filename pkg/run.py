"""
Entry point: `python run.py <subcommand> ...` runs a study through the CLI,
`python run.py serve` starts the HTTP surface under uvicorn.
"""

import sys

from app.cli import cli
from app.main import app

__all__ = ["app", "cli"]

if __name__ == "__main__":
    if len(sys.argv) > 1 and sys.argv[1] == "serve":
        import uvicorn

        uvicorn.run(app, host="0.0.0.0", port=8000)
    else:
        cli()
