"""Classification of finite Z[t, 1/t]-modules and Alexander quandles of order p^n, n <= 4."""

__version__ = "0.1.0"
