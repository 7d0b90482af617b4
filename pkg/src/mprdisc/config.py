"""Flat experiment configuration read from JSON.

Powers are given in dBm (``tx_power_dbm``, ``noise_density_dbm_hz``) and
converted to watts when the channel is built.
"""
import json
from dataclasses import asdict, dataclass, fields

from mprdisc.analysis import MpskParams, optimal_pt
from mprdisc.channel import ChannelParams, dbm_to_watts
from mprdisc.sim import ProtocolConfig


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    scenario: str = "detection"
    tx_power_dbm: float = -24.0
    noise_density_dbm_hz: float = -173.0
    bandwidth_hz: float = 100.0
    path_loss: str = "offset"
    path_loss_eta: float = 4.0
    fading: str = "none"
    p_T: float = 0.5
    tau: float = 1.0
    include_noise: bool = False
    n_nodes: int = 8
    region_radius_m: float = 1000.0
    discovery_radius_m: float = 1000.0
    grid_points: int = 7
    slots: int = 20
    early_stop_window: int | None = None
    trials: int = 100
    seed: int = 0
    mc_samples: int = 1_000_000
    mpsk_ber: float = 1e-6
    mpsk_bits_per_slot: float = 1.0
    mpsk_bandwidth_hz: float = 1.0
    tau_min: float = 0.1
    tau_max: float = 100.0
    tau_points: int = 61
    output_dir: str = "out"

    def channel(self):
        if self.path_loss == "simplified":
            from mprdisc.channel import simplified_channel

            return simplified_channel(self.path_loss_eta, self.fading)
        return ChannelParams(
            tx_power_G=dbm_to_watts(self.tx_power_dbm),
            path_loss_eta=self.path_loss_eta,
            fading=self.fading,
            noise_density_N0=dbm_to_watts(self.noise_density_dbm_hz),
            bandwidth_B=self.bandwidth_hz,
            path_loss=self.path_loss,
        )

    def protocol(self, **kw):
        return ProtocolConfig(self.channel(), self.p_T, self.tau, self.include_noise, **kw)

    def mpsk(self, M):
        return MpskParams(M=M, target_ber_z=self.mpsk_ber, W=self.mpsk_bits_per_slot,
                          B=self.mpsk_bandwidth_hz)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def derived(self):
        """Watt-valued quantities implied by the dBm settings, echoed into summaries."""
        ch = self.channel()
        return {"tx_power_W": ch.tx_power_G, "noise_density_W_per_Hz": ch.noise_density_N0,
                "noise_power_W": ch.noise_power_N}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        base = PRESETS.get(d.get("scenario", "detection"))
        if base is None:
            raise ConfigError(f"scenario: unknown preset {d.get('scenario')!r}; "
                              f"choose from {sorted(PRESETS)}")
        merged = {**base, **d}
        known = {f.name: f for f in fields(cls)}
        for key, value in merged.items():
            if key not in known:
                raise ConfigError(f"{key}: unknown configuration key")
            merged[key] = _coerce(key, value, cls.__dataclass_fields__[key].default)
        cfg = cls(**merged)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"malformed JSON: {e}") from None
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a JSON object")
        return cls.from_dict(d)

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_json(f.read())

    def validate(self):
        checks = [
            ("p_T", 0.0 <= self.p_T <= 1.0),
            ("tau", self.tau > 0),
            ("path_loss", self.path_loss in ("offset", "simplified")),
            ("fading", self.fading in ("none", "rayleigh")),
            ("n_nodes", 1 <= self.n_nodes <= 15),
            ("region_radius_m", self.region_radius_m > 0),
            ("discovery_radius_m", self.discovery_radius_m > 0),
            ("grid_points", self.grid_points >= 1),
            ("slots", self.slots >= 1),
            ("trials", self.trials >= 1),
            ("tau_min", 0 < self.tau_min < self.tau_max),
            ("tau_points", self.tau_points >= 2),
        ]
        for key, ok in checks:
            if not ok:
                raise ConfigError(f"{key}: invalid value {getattr(self, key)!r}")


def _coerce(key, value, default):
    if value is None:
        if default is None:
            return None
        raise ConfigError(f"{key}: null is not allowed")
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int) or (default is None and key == "early_stop_window"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    return value


PRESETS = {
    # detection experiments: 8 nodes in a 1 km disk, reference at the centre
    "detection": {},
    # three mutually-neighboring nodes, unit-power r^-eta law, unit radius
    "three_node": {
        "path_loss": "simplified",
        "n_nodes": 2,
        "region_radius_m": 1.0,
        "discovery_radius_m": 1.0,
        "tau": 1.0,
        "p_T": round(optimal_pt(1.0, 4.0), 4),
        "slots": 15,
        "trials": 100_000,
    },
}
