"""target-ledger: TARGET balance netting, reconstruction and strategem simulations."""

__version__ = "1.0.0"
