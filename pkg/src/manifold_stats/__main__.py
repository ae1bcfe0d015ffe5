"""python -m manifold_stats forwards to the CLI."""

from .cli import main

raise SystemExit(main())
