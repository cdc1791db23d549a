"""Entry point for python -m target_ledger."""

import sys

# Absolute import so the module also works when frozen
if __name__ == '__main__':
    from target_ledger.cli import main
    sys.exit(main())
