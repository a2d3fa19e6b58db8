"""Plain-text export/import of multiscale bases and splits.

Space file layout::

    # lsi-parabolic space v1
    grid <nc> <r>
    basis <method> <m> <k> <L|none> <drop_tol>
    nolp <count>
    subdomain <i> <method> <k> <L>
    discarded <theta> ...
    vector <j> <theta> <nnz>
    <global free dof> <value>
    ...
    end

Floats are written with ``repr`` so a round trip is exact.  The Galerkin
matrices are not stored; they are recomputed from the fine operators on load.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .coarse_space import BasisConfig, MultiscaleSpace, SplitSpace, space_from_bases, split_space
from .errors import ConfigError
from .local_basis import LocalBasis

MAGIC = "# lsi-parabolic space v1"
SPLIT_MAGIC = "# lsi-parabolic split v1"


def _bases_from_space(space: MultiscaleSpace) -> list[LocalBasis]:
    P = sp.csc_matrix(space.P)
    cfg = space.config or BasisConfig()
    out = []
    for i in range(space.n_subdomains):
        cols = space.columns_of(i)
        dofs = np.unique(np.concatenate([P.indices[P.indptr[c]:P.indptr[c + 1]] for c in cols]))
        vecs = P[:, cols][dofs, :].toarray()
        disc = space.discarded[i] if i < len(space.discarded) else np.zeros(0)
        out.append(LocalBasis(cfg.method, cfg.k, vecs, space.thetas[cols], index=i, dofs=dofs,
                              discarded_thetas=np.asarray(disc), nolp=0))
    return out


def write_bases(fh, bases: list[LocalBasis]) -> None:
    for b in sorted(bases, key=lambda b: b.index):
        fh.write(f"subdomain {b.index} {b.method} {b.k} {b.L}\n")
        fh.write("discarded" + "".join(f" {float(t)!r}" for t in b.discarded_thetas) + "\n")
        for j in range(b.L):
            v = b.vectors[:, j]
            nz = np.flatnonzero(v)
            fh.write(f"vector {j} {float(b.thetas[j])!r} {nz.size}\n")
            for d, val in zip(b.dofs[nz], v[nz]):
                fh.write(f"{int(d)} {float(val)!r}\n")


def save_space(path, space: MultiscaleSpace, grid) -> Path:
    cfg = space.config or BasisConfig()
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(MAGIC + "\n")
        fh.write(f"grid {grid.nc} {grid.r}\n")
        fh.write(f"basis {cfg.method} {cfg.m} {cfg.k} {cfg.L if cfg.L is not None else 'none'} {cfg.drop_tol!r}\n")
        fh.write(f"nolp {space.nolp}\n")
        write_bases(fh, _bases_from_space(space))
        fh.write("end\n")
    return path


def _tokens(path):
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if line and not line.startswith("#"):
                yield lineno, line.split()


def load_space(path, ops) -> MultiscaleSpace:
    """Read a space file and rebuild ``P``, ``A_c``, ``M_c`` against ``ops``."""
    grid = ops.grid
    it = _tokens(path)
    cfg = None
    nolp = 0
    bases: list[LocalBasis] = []
    cur = None
    try:
        for lineno, tok in it:
            key = tok[0]
            if key == "grid":
                if (int(tok[1]), int(tok[2])) != (grid.nc, grid.r):
                    raise ConfigError(f"{path}:{lineno}: space built for grid {tok[1]}x{tok[2]}, "
                                      f"operators use {grid.nc}x{grid.r}")
            elif key == "basis":
                L = None if tok[4] == "none" else int(tok[4])
                cfg = BasisConfig(tok[1], int(tok[2]), int(tok[3]), L, float(tok[5]))
            elif key == "nolp":
                nolp = int(tok[1])
            elif key == "subdomain":
                cur = {"index": int(tok[1]), "method": tok[2], "k": int(tok[3]), "L": int(tok[4]),
                       "vectors": [], "thetas": [], "discarded": np.zeros(0)}
                bases.append(cur)
            elif key == "discarded":
                cur["discarded"] = np.array([float(t) for t in tok[1:]])
            elif key == "vector":
                nnz = int(tok[3])
                cur["thetas"].append(float(tok[2]))
                entries = [next(it)[1] for _ in range(nnz)]
                cur["vectors"].append({int(d): float(v) for d, v in entries})
            elif key == "end":
                break
            else:
                raise ConfigError(f"{path}:{lineno}: unexpected record {key!r}")
    except (ValueError, IndexError, StopIteration, TypeError) as exc:
        raise ConfigError(f"{path}: malformed space file ({exc})") from exc

    local = []
    for b in bases:
        dofs = np.array(sorted(set().union(*[v.keys() for v in b["vectors"]])), dtype=int)
        pos = {d: p for p, d in enumerate(dofs)}
        V = np.zeros((dofs.size, len(b["vectors"])))
        for j, v in enumerate(b["vectors"]):
            for d, val in v.items():
                V[pos[d], j] = val
        local.append(LocalBasis(b["method"], b["k"], V, np.array(b["thetas"]), index=b["index"],
                                dofs=dofs, discarded_thetas=b["discarded"]))
    space = space_from_bases(local, ops, cfg)
    space.nolp = nolp
    return space


def save_split(path, split: SplitSpace, omega: float) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(SPLIT_MAGIC + "\n")
        fh.write(f"orthogonal {int(split.orthogonal)}\n")
        fh.write(f"omega {omega!r}\n")
        fh.write("explicit" + "".join(f" {int(c)}" for c in split.i2) + "\n")
    return path


def load_split(path, space: MultiscaleSpace) -> tuple[SplitSpace, float]:
    orth, omega, explicit = True, 1.0, None
    for lineno, tok in _tokens(path):
        if tok[0] == "orthogonal":
            orth = bool(int(tok[1]))
        elif tok[0] == "omega":
            omega = float(tok[1])
        elif tok[0] == "explicit":
            explicit = np.array([int(t) for t in tok[1:]], dtype=int)
        else:
            raise ConfigError(f"{path}:{lineno}: unexpected record {tok[0]!r}")
    if explicit is None:
        raise ConfigError(f"{path}: missing explicit index list")
    return split_space(space, 0, extra_explicit=explicit, orthogonalize=orth), omega
