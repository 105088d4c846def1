"""Parameter naming, initialization, and checkpoint binding.

A model is stored as a flat ``name -> float32 array`` mapping whose names
and shapes are fully determined by the configuration. ``param_spec`` is
the single source of truth for that table; ``init_model_params`` fills it
with seeded values and ``model_weights_from_params`` binds it (without
copying) into the structured weight views the forward pass consumes,
rejecting any mapping that does not match the configuration exactly.
"""

import numpy as np

from clft.config import STEM_BLOCKS, STEM_CONV1_CHANNELS, STEM_EXPANSION, STEM_WIDTHS
from clft.decoder import (
    BranchWeights,
    FusionStageWeights,
    HeadWeights,
    ModelWeights,
    RcuWeights,
    ReadoutWeights,
    ResampleWeights,
)
from clft.embedding import BottleneckWeights, EmbeddingWeights, StemWeights
from clft.encoder import EncoderLayerWeights

BRANCHES = ("camera", "lidar")
INIT_STD = 0.02
INIT_CLIP = 2.0


class CheckpointMismatchError(ValueError):
    """Checkpoint contents do not match the model configuration."""


def _stem_spec(prefix):
    """Names and shapes for the hybrid convolutional stem."""
    entries = []
    entries.append((f"{prefix}.conv1.weight", (STEM_CONV1_CHANNELS, 3, 7, 7)))
    entries.append((f"{prefix}.conv1.bias", (STEM_CONV1_CHANNELS,)))
    in_ch = STEM_CONV1_CHANNELS
    for s, (width, blocks) in enumerate(zip(STEM_WIDTHS, STEM_BLOCKS), start=1):
        out_ch = width * STEM_EXPANSION
        for i in range(1, blocks + 1):
            p = f"{prefix}.stage{s}.block{i}"
            entries.append((f"{p}.conv1.weight", (width, in_ch, 1, 1)))
            entries.append((f"{p}.conv1.bias", (width,)))
            entries.append((f"{p}.conv2.weight", (width, width, 3, 3)))
            entries.append((f"{p}.conv2.bias", (width,)))
            entries.append((f"{p}.conv3.weight", (out_ch, width, 1, 1)))
            entries.append((f"{p}.conv3.bias", (out_ch,)))
            if i == 1:
                entries.append((f"{p}.shortcut.weight", (out_ch, in_ch, 1, 1)))
                entries.append((f"{p}.shortcut.bias", (out_ch,)))
            in_ch = out_ch
    return entries


def _resample_in_channels(cfg, k):
    """Channel width of the map entering resample stage k."""
    if cfg.tap_layers[k] > 0:
        return cfg.feature_dim
    # Stem taps arrive in tap order: stride-4 stage first, stride-8 second.
    stem_index = sum(1 for j in range(k) if cfg.tap_layers[j] == 0)
    return STEM_WIDTHS[stem_index] * STEM_EXPANSION


def _resample_factor(cfg, k):
    """Side-length ratio from tap resolution to output stride resolution."""
    if cfg.tap_layers[k] == 0:
        return 1.0  # stem maps already sit at their output stride
    return cfg.patch / cfg.scales[k]


def param_spec(cfg):
    """Ordered name -> shape table for every parameter of ``cfg``."""
    d = cfg.feature_dim
    fd = cfg.fusion_dim
    entries = []
    for b in BRANCHES:
        if cfg.variant == "hybrid":
            entries.extend(_stem_spec(f"{b}.stem"))
        entries.append((f"{b}.embed.projection", (cfg.token_channels, d)))
        entries.append((f"{b}.embed.class_token", (1, d)))
        entries.append((f"{b}.embed.positional", (cfg.tokens + 1, d)))
        for layer in range(1, cfg.layers + 1):
            p = f"{b}.encoder.layer{layer:02d}"
            entries.append((f"{p}.norm1.gamma", (d,)))
            entries.append((f"{p}.norm1.beta", (d,)))
            for proj in ("query", "key", "value", "out"):
                entries.append((f"{p}.attn.{proj}.weight", (d, d)))
                entries.append((f"{p}.attn.{proj}.bias", (d,)))
            entries.append((f"{p}.norm2.gamma", (d,)))
            entries.append((f"{p}.norm2.beta", (d,)))
            entries.append((f"{p}.mlp.fc1.weight", (d, cfg.mlp_dim)))
            entries.append((f"{p}.mlp.fc1.bias", (cfg.mlp_dim,)))
            entries.append((f"{p}.mlp.fc2.weight", (cfg.mlp_dim, d)))
            entries.append((f"{p}.mlp.fc2.bias", (d,)))
        for k, tap in enumerate(cfg.tap_layers):
            if tap > 0:
                entries.append((f"{b}.readout{k}.weight", (2 * d, d)))
                entries.append((f"{b}.readout{k}.bias", (d,)))
        for k in range(len(cfg.scales)):
            p = f"{b}.resample{k}"
            entries.append((f"{p}.project.weight", (fd, _resample_in_channels(cfg, k), 1, 1)))
            entries.append((f"{p}.project.bias", (fd,)))
            factor = _resample_factor(cfg, k)
            if factor > 1:
                f = int(factor)
                entries.append((f"{p}.up.weight", (fd, fd, f, f)))
                entries.append((f"{p}.up.bias", (fd,)))
            elif factor == 0.5:
                entries.append((f"{p}.down.weight", (fd, fd, 3, 3)))
                entries.append((f"{p}.down.bias", (fd,)))
    for k in range(len(cfg.scales)):
        for unit in ("camera.rcu1", "camera.rcu2", "lidar.rcu1", "lidar.rcu2", "merge"):
            for conv in ("conv1", "conv2"):
                entries.append((f"fusion.stage{k}.{unit}.{conv}.weight", (fd, fd, 3, 3)))
    entries.append(("head.deconv.weight", (fd, fd, 2, 2)))
    entries.append(("head.deconv.bias", (fd,)))
    entries.append(("head.classifier.weight", (len(cfg.classes), fd, 1, 1)))
    entries.append(("head.classifier.bias", (len(cfg.classes),)))
    return dict(entries)


def _truncated_normal(rng, shape, std=INIT_STD, clip=INIT_CLIP):
    """Normal draws with |z| > clip resampled until inside, then scaled."""
    n = int(np.prod(shape))
    z = rng.standard_normal(n)
    bad = np.abs(z) > clip
    while bad.any():
        z[bad] = rng.standard_normal(int(bad.sum()))
        bad = np.abs(z) > clip
    return (z * std).astype(np.float32).reshape(shape)


def init_model_params(cfg, seed=0):
    """Seeded random initialization of every parameter, in table order.

    Norm gains start at one, biases and norm shifts at zero, everything
    else truncated normal (std 0.02, clipped at 2 std). The draw order is
    the ``param_spec`` order, so a (config, seed) pair fully determines
    every byte.
    """
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in param_spec(cfg).items():
        if name.endswith(".gamma"):
            params[name] = np.ones(shape, dtype=np.float32)
        elif name.endswith((".beta", ".bias")):
            params[name] = np.zeros(shape, dtype=np.float32)
        else:
            params[name] = _truncated_normal(rng, shape)
    return params


def _bind_stem(params, prefix):
    stages = []
    for s, blocks in enumerate(STEM_BLOCKS, start=1):
        stage = []
        for i in range(1, blocks + 1):
            p = f"{prefix}.stage{s}.block{i}"
            stage.append(
                BottleneckWeights(
                    conv1_w=params[f"{p}.conv1.weight"],
                    conv1_b=params[f"{p}.conv1.bias"],
                    conv2_w=params[f"{p}.conv2.weight"],
                    conv2_b=params[f"{p}.conv2.bias"],
                    conv3_w=params[f"{p}.conv3.weight"],
                    conv3_b=params[f"{p}.conv3.bias"],
                    stride=2 if i == 1 else 1,
                    shortcut_w=params.get(f"{p}.shortcut.weight"),
                    shortcut_b=params.get(f"{p}.shortcut.bias"),
                )
            )
        stages.append(stage)
    return StemWeights(
        conv1_w=params[f"{prefix}.conv1.weight"],
        conv1_b=params[f"{prefix}.conv1.bias"],
        stages=stages,
    )


def _bind_branch(params, cfg, b):
    layers = []
    for layer in range(1, cfg.layers + 1):
        p = f"{b}.encoder.layer{layer:02d}"
        layers.append(
            EncoderLayerWeights(
                ln1_gamma=params[f"{p}.norm1.gamma"],
                ln1_beta=params[f"{p}.norm1.beta"],
                wq=params[f"{p}.attn.query.weight"],
                bq=params[f"{p}.attn.query.bias"],
                wk=params[f"{p}.attn.key.weight"],
                bk=params[f"{p}.attn.key.bias"],
                wv=params[f"{p}.attn.value.weight"],
                bv=params[f"{p}.attn.value.bias"],
                wo=params[f"{p}.attn.out.weight"],
                bo=params[f"{p}.attn.out.bias"],
                ln2_gamma=params[f"{p}.norm2.gamma"],
                ln2_beta=params[f"{p}.norm2.beta"],
                mlp_w1=params[f"{p}.mlp.fc1.weight"],
                mlp_b1=params[f"{p}.mlp.fc1.bias"],
                mlp_w2=params[f"{p}.mlp.fc2.weight"],
                mlp_b2=params[f"{p}.mlp.fc2.bias"],
            )
        )
    readouts = []
    resamples = []
    for k, tap in enumerate(cfg.tap_layers):
        if tap > 0:
            readouts.append(
                ReadoutWeights(params[f"{b}.readout{k}.weight"], params[f"{b}.readout{k}.bias"])
            )
        else:
            readouts.append(None)
        p = f"{b}.resample{k}"
        resamples.append(
            ResampleWeights(
                project_w=params[f"{p}.project.weight"],
                project_b=params[f"{p}.project.bias"],
                up_w=params.get(f"{p}.up.weight"),
                up_b=params.get(f"{p}.up.bias"),
                down_w=params.get(f"{p}.down.weight"),
                down_b=params.get(f"{p}.down.bias"),
            )
        )
    return BranchWeights(
        embed=EmbeddingWeights(
            projection=params[f"{b}.embed.projection"],
            class_token=params[f"{b}.embed.class_token"],
            positional=params[f"{b}.embed.positional"],
        ),
        encoder=layers,
        readouts=readouts,
        resamples=resamples,
        stem=_bind_stem(params, f"{b}.stem") if cfg.variant == "hybrid" else None,
    )


def model_weights_from_params(params, cfg):
    """Bind a flat parameter mapping into structured weights for ``cfg``.

    The mapping must carry exactly the names of ``param_spec(cfg)`` with
    exactly the expected shapes; anything else raises
    CheckpointMismatchError.
    """
    expected = param_spec(cfg)
    missing = [name for name in expected if name not in params]
    if missing:
        raise CheckpointMismatchError(
            f"checkpoint lacks {len(missing)} parameters for variant {cfg.variant!r}, "
            f"first missing: {missing[0]}"
        )
    extra = [name for name in params if name not in expected]
    if extra:
        raise CheckpointMismatchError(
            f"checkpoint has {len(extra)} parameters unknown to variant {cfg.variant!r}, "
            f"first extra: {extra[0]}"
        )
    for name, shape in expected.items():
        if tuple(params[name].shape) != shape:
            raise CheckpointMismatchError(
                f"parameter {name} has shape {tuple(params[name].shape)}, expected {shape}"
            )
    def _rcu(stage, unit):
        return RcuWeights(
            conv1_w=params[f"fusion.stage{stage}.{unit}.conv1.weight"],
            conv2_w=params[f"fusion.stage{stage}.{unit}.conv2.weight"],
        )

    fusion = [
        FusionStageWeights(
            camera_rcu1=_rcu(k, "camera.rcu1"),
            camera_rcu2=_rcu(k, "camera.rcu2"),
            lidar_rcu1=_rcu(k, "lidar.rcu1"),
            lidar_rcu2=_rcu(k, "lidar.rcu2"),
            merge_rcu=_rcu(k, "merge"),
        )
        for k in range(len(cfg.scales))
    ]
    head = HeadWeights(
        deconv_w=params["head.deconv.weight"],
        deconv_b=params["head.deconv.bias"],
        classifier_w=params["head.classifier.weight"],
        classifier_b=params["head.classifier.bias"],
    )
    return ModelWeights(
        camera=_bind_branch(params, cfg, "camera"),
        lidar=_bind_branch(params, cfg, "lidar"),
        fusion=fusion,
        head=head,
    )


def count_params(cfg):
    """Total scalar parameter count for a configuration."""
    return sum(int(np.prod(shape)) for shape in param_spec(cfg).values())
