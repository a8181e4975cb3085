"""Reference optimal (M, B) pairs for the I_AIC sweep -20, -15, -10, -5, 0 dB."""

from cogmiso.closed_form import SystemConfig

I_AIC_DB = (-20, -15, -10, -5, 0)

BASE = dict(n_t=5, c_bits=2, b_max=4, mu=0.1, alpha=0.01, sigma2=1.0)


def _row(text):
    return [tuple(int(v) for v in p.split("/")) for p in text.split()]


# (table, label, config overrides, delayed, optima)
SCENARIOS = [
    (1, "alpha=0.01", dict(alpha=0.01), False, _row("4/0 2/4 2/1 2/0 2/0")),
    (1, "alpha=0.1", dict(alpha=0.1), False, _row("4/0 4/0 4/0 2/4 2/1")),
    (2, "C=2", dict(c_bits=2), False, _row("4/0 2/4 2/1 2/0 2/0")),
    (2, "C=4", dict(c_bits=4), False, _row("4/4 2/4 2/4 2/0 2/0")),
    (2, "C=6", dict(c_bits=6), False, _row("4/4 4/4 2/4 2/1 2/0")),
    (3, "mu=0.05", dict(c_bits=5, mu=0.05), False, _row("4/4 4/4 2/4 2/4 2/1")),
    (3, "mu=0.10", dict(c_bits=5, mu=0.10), False, _row("4/4 4/4 2/4 2/0 2/0")),
    (3, "mu=0.15", dict(c_bits=5, mu=0.15), False, _row("4/0 4/0 2/0 2/0 2/0")),
    (4, "rho=1,mu=0.01", dict(c_bits=5, mu=0.01, rho=1.0), True, _row("4/4 4/4 2/4 2/4 2/4")),
    (4, "rho=0.95,mu=0.01", dict(c_bits=5, mu=0.01, rho=0.95), True, _row("4/4 4/4 2/4 2/4 2/4")),
    (4, "rho=0.5,mu=0.01", dict(c_bits=5, mu=0.01, rho=0.5), True, _row("4/4 4/4 2/4 2/4 2/4")),
    (4, "rho=1,mu=0.1", dict(c_bits=5, mu=0.1, rho=1.0), True, _row("4/4 4/4 2/4 2/0 2/0")),
    (4, "rho=0.95,mu=0.1", dict(c_bits=5, mu=0.1, rho=0.95), True, _row("4/4 4/4 2/4 2/0 2/0")),
    (4, "rho=0.5,mu=0.1", dict(c_bits=5, mu=0.1, rho=0.5), True, _row("4/0 4/0 2/0 2/0 2/0")),
]


def config(overrides, i_aic_db):
    return SystemConfig(**{**BASE, **overrides, "i_aic": 10.0 ** (i_aic_db / 10.0)})


def cases(tables=(1, 2, 3, 4)):
    """Flattened (id, cfg, delayed, expected) for the chosen tables."""
    out = []
    for table, label, over, delayed, optima in SCENARIOS:
        if table in tables:
            for db, expect in zip(I_AIC_DB, optima):
                out.append((f"T{table}[{label}]@{db}dB", config(over, db), delayed, expect))
    return out
