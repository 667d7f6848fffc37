"""Experiment configuration: a flat ``key = value`` text file.

Blank lines and ``#`` comments are ignored. Tuples are comma-separated.
Every key is optional; the defaults reproduce the reference setup
(10x10 APs with 2 antennas on 1 km^2, N=2000, rho=0.01, L=20, 17 dBm,
d0=1 m, PL(d0)=30 dB, v=3.8, 8 dB shadowing, T_max=4).

Keys (type, default):

=====================  ==========  ==============================================
rows, cols             int         10, 10 (AP grid)
antennas               int         2 (antennas per AP)
side_m                 float       1000
n_ues                  int         2000
activation_prob        float       0.01
pool_size              int         20
zc_root                int         3
tx_power_dbm           float       17
noise_psd_dbm_hz       float       -174
bandwidth_hz           float       200000
noise_figure_db        float       9
ref_distance_m         float       1
ref_loss_db            float       30
pathloss_exponent      float       3.8
shadow_sigma_db        float       8
t_max                  int         4
hidden_sizes           int tuple   empty = (128,128,64,32), or (64,128,64,32) for M=49
normalizer             str         db_standard | minmax | identity
ted_mode               str         per_position | global
q_samples              int         100000 (20000 is a reasonable fast mode)
split                  float tuple 0.8,0.1,0.1
max_epochs             int         1000
min_gradient           float       1e-6
max_val_checks         int         8
scg_sigma              float       1e-4
scg_lambda_init        float       1e-6
m_c                    int         4 (scheme comparison)
m_c_list               int tuple   1,2,4,8,16 (sweep of the DNN-clustered scheme)
schemes                str tuple   all_ap,mc_strongest,ted_cluster,dnn_cluster,genie
trials                 int         10000
kmeans_restarts        int         10
sinr_cap               float       1e12
cluster_match          str         centroid | gain
genie_gain             str         large_scale | instantaneous
asym_grid_sides        int tuple   5,10,20 (grid side lengths for the asymptotic check)
asym_trials            int         1000
asym_target            float tuple 300,400
asym_colliders         float tuple 700,650 (x1,y1,x2,y2,...)
model_file             str         "" (pretrained model for ``rates``; empty = train first)
ted_file               str         "" (fitted T-ED for ``rates``; empty = fit on a fresh dataset)
seed                   int         0
workers                int         1
=====================  ==========  ==============================================
"""

from __future__ import annotations

import dataclasses
import hashlib
import typing
from dataclasses import dataclass, fields, replace

from ..channel import PathLossParams, RadioParams
from ..clustering import SCHEMES
from ..multiplicity.training import TrainConfig, default_hidden_sizes
from ..scene import AreaSpec, Deployment, TrafficSpec, make_grid_deployment


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    rows: int = 10
    cols: int = 10
    antennas: int = 2
    side_m: float = 1000.0
    n_ues: int = 2000
    activation_prob: float = 0.01
    pool_size: int = 20
    zc_root: int = 3
    tx_power_dbm: float = 17.0
    noise_psd_dbm_hz: float = -174.0
    bandwidth_hz: float = 200e3
    noise_figure_db: float = 9.0
    ref_distance_m: float = 1.0
    ref_loss_db: float = 30.0
    pathloss_exponent: float = 3.8
    shadow_sigma_db: float = 8.0
    t_max: int = 4
    hidden_sizes: typing.Tuple[int, ...] = ()
    normalizer: str = "db_standard"
    ted_mode: str = "per_position"
    q_samples: int = 100_000
    split: typing.Tuple[float, ...] = (0.8, 0.1, 0.1)
    max_epochs: int = 1000
    min_gradient: float = 1e-6
    max_val_checks: int = 8
    scg_sigma: float = 1e-4
    scg_lambda_init: float = 1e-6
    m_c: int = 4
    m_c_list: typing.Tuple[int, ...] = (1, 2, 4, 8, 16)
    schemes: typing.Tuple[str, ...] = SCHEMES
    trials: int = 10_000
    kmeans_restarts: int = 10
    sinr_cap: float = 1e12
    cluster_match: str = "centroid"
    genie_gain: str = "large_scale"
    asym_grid_sides: typing.Tuple[int, ...] = (5, 10, 20)
    asym_trials: int = 1000
    asym_target: typing.Tuple[float, ...] = (300.0, 400.0)
    asym_colliders: typing.Tuple[float, ...] = (700.0, 650.0)
    model_file: str = ""
    ted_file: str = ""
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown:
            raise ConfigError(f"unknown schemes: {sorted(unknown)}")
        if self.cluster_match not in ("centroid", "gain"):
            raise ConfigError("cluster_match must be 'centroid' or 'gain'")
        if self.genie_gain not in ("large_scale", "instantaneous"):
            raise ConfigError("genie_gain must be 'large_scale' or 'instantaneous'")
        if len(self.split) != 3:
            raise ConfigError("split needs three fractions")
        if len(self.asym_target) != 2 or len(self.asym_colliders) % 2:
            raise ConfigError("asym_target is one point and asym_colliders a list of x,y pairs")

    # --- derived objects -------------------------------------------------

    @property
    def area(self) -> AreaSpec:
        return AreaSpec(self.side_m)

    def deployment(self) -> Deployment:
        return make_grid_deployment(self.rows, self.cols, self.area, self.antennas)

    def traffic(self) -> TrafficSpec:
        return TrafficSpec(self.n_ues, self.activation_prob, self.pool_size)

    def pathloss(self) -> PathLossParams:
        return PathLossParams(self.ref_distance_m, self.ref_loss_db, self.pathloss_exponent,
                              self.shadow_sigma_db)

    def radio(self) -> RadioParams:
        return RadioParams(self.tx_power_dbm, self.noise_psd_dbm_hz, self.bandwidth_hz,
                           self.noise_figure_db)

    def train_config(self) -> TrainConfig:
        return TrainConfig(self.max_epochs, self.min_gradient, self.max_val_checks, self.scg_sigma,
                           self.scg_lambda_init, tuple(self.split), self.q_samples)

    def hidden(self) -> tuple:
        return tuple(self.hidden_sizes) or default_hidden_sizes(self.rows * self.cols)

    # --- text round trip ---------------------------------------------------

    def to_text(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            out.append(f"{f.name} = {v}")
        return "\n".join(out) + "\n"

    def digest(self, exclude=("workers",)) -> str:
        """Hash of every setting that can influence results."""
        text = "".join(line + "\n" for line in self.to_text().splitlines()
                       if line.split(" = ")[0] not in exclude)
        return hashlib.sha256(text.encode()).hexdigest()

    def replace(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> "ExperimentConfig":
        hints = typing.get_type_hints(cls)
        names = {f.name for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
            key, val = (p.strip() for p in line.split("=", 1))
            if key not in names:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _coerce(hints[key], val)
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
        return cls(**values)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_text(fh.read(), str(path))


def _coerce(tp, val: str):
    if typing.get_origin(tp) is tuple:
        (inner, _) = typing.get_args(tp)
        return tuple(inner(v.strip()) for v in val.split(",") if v.strip())
    if tp is int:
        return int(float(val)) if "e" in val.lower() else int(val)
    return tp(val)


def fields_table() -> list[str]:
    return [f.name for f in dataclasses.fields(ExperimentConfig)]
