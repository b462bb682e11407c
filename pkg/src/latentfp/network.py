"""Generator (skip-connected denoising autoencoder) and discriminator.

Architecture summary (patch size 192, channels double as maps halve):
  encoder   C1: 3x3/1 x2 -> 64   C2: 2x2/2 + 3x3/1 -> 128   C3: -> 256
            C4: -> 512           C5: 2x2/2 -> 1024
  decoder   DC1..DC4: 2x2/2 up-conv then 3x3/1 up-conv, channels
            512/256/128/64; encoder outputs C4..C1 are concatenated in
            front of each block's second up-convolution
  output    DC5: 3x3/1 up-conv to 1 channel, batch norm, sigmoid
  discriminator: six 4x4/2 convolutions (64,64,128,128,256,256) then a
            3x3/1 valid convolution to a scalar score, sigmoid
All convolutions are followed by batch norm; activations are leaky ReLU.
"""

import hashlib
import json
import os
from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn


@dataclass(frozen=True)
class GeneratorSpec:
    in_channels: int = 1
    base_channels: int = 64          # doubles at every downsampling
    leaky_slope: float = 0.2
    patch_size: int = 192            # any multiple of 16 works

    @property
    def encoder_channels(self):
        b = self.base_channels
        return (b, 2 * b, 4 * b, 8 * b, 16 * b)


@dataclass(frozen=True)
class DiscriminatorSpec:
    in_channels: int = 2
    channels: tuple = (64, 64, 128, 128, 256, 256)
    leaky_slope: float = 0.2
    patch_size: int = 192


def spec_hash(spec) -> str:
    payload = json.dumps({"type": type(spec).__name__, **asdict(spec)}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def _conv_bn(in_ch, out_ch, kernel, stride, padding, slope):
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, kernel, stride=stride, padding=padding),
        nn.BatchNorm2d(out_ch),
        nn.LeakyReLU(slope, inplace=True),
    )


def _upconv_bn(in_ch, out_ch, kernel, stride, padding, slope):
    return nn.Sequential(
        nn.ConvTranspose2d(in_ch, out_ch, kernel, stride=stride, padding=padding),
        nn.BatchNorm2d(out_ch),
        nn.LeakyReLU(slope, inplace=True),
    )


class Generator(nn.Module):
    def __init__(self, spec: GeneratorSpec = GeneratorSpec()):
        super().__init__()
        self.spec = spec
        c1, c2, c3, c4, c5 = spec.encoder_channels
        s = spec.leaky_slope
        ic = spec.in_channels
        self.enc1 = nn.Sequential(_conv_bn(ic, c1, 3, 1, 1, s), _conv_bn(c1, c1, 3, 1, 1, s))
        self.enc2 = nn.Sequential(_conv_bn(c1, c2, 2, 2, 0, s), _conv_bn(c2, c2, 3, 1, 1, s))
        self.enc3 = nn.Sequential(_conv_bn(c2, c3, 2, 2, 0, s), _conv_bn(c3, c3, 3, 1, 1, s))
        self.enc4 = nn.Sequential(_conv_bn(c3, c4, 2, 2, 0, s), _conv_bn(c4, c4, 3, 1, 1, s))
        self.enc5 = _conv_bn(c4, c5, 2, 2, 0, s)
        # second up-conv of each decoder block absorbs the concatenated skip
        self.dec1_up = _upconv_bn(c5, c4, 2, 2, 0, s)
        self.dec1_fuse = _upconv_bn(2 * c4, c4, 3, 1, 1, s)
        self.dec2_up = _upconv_bn(c4, c3, 2, 2, 0, s)
        self.dec2_fuse = _upconv_bn(2 * c3, c3, 3, 1, 1, s)
        self.dec3_up = _upconv_bn(c3, c2, 2, 2, 0, s)
        self.dec3_fuse = _upconv_bn(2 * c2, c2, 3, 1, 1, s)
        self.dec4_up = _upconv_bn(c2, c1, 2, 2, 0, s)
        self.dec4_fuse = _upconv_bn(2 * c1, c1, 3, 1, 1, s)
        self.dec5 = nn.Sequential(
            nn.ConvTranspose2d(c1, 1, 3, stride=1, padding=1),
            nn.BatchNorm2d(1),
            nn.Sigmoid(),
        )
        init_weights(self)

    def forward(self, x):
        e1 = self.enc1(x)
        e2 = self.enc2(e1)
        e3 = self.enc3(e2)
        e4 = self.enc4(e3)
        e5 = self.enc5(e4)
        d1 = self.dec1_fuse(torch.cat([self.dec1_up(e5), e4], dim=1))
        d2 = self.dec2_fuse(torch.cat([self.dec2_up(d1), e3], dim=1))
        d3 = self.dec3_fuse(torch.cat([self.dec3_up(d2), e2], dim=1))
        d4 = self.dec4_fuse(torch.cat([self.dec4_up(d3), e1], dim=1))
        return self.dec5(d4)


class Discriminator(nn.Module):
    def __init__(self, spec: DiscriminatorSpec = DiscriminatorSpec()):
        super().__init__()
        self.spec = spec
        s = spec.leaky_slope
        layers = []
        prev = spec.in_channels
        for ch in spec.channels:
            layers.append(_conv_bn(prev, ch, 4, 2, 1, s))
            prev = ch
        self.features = nn.Sequential(*layers)
        self.head = nn.Sequential(
            nn.Conv2d(prev, 1, 3, stride=1, padding=0),
            nn.BatchNorm2d(1),
            nn.Sigmoid(),
        )
        init_weights(self)

    def forward(self, x):
        f = self.features(x)
        if f.shape[-1] < 3 or f.shape[-2] < 3:
            # small patches leave features under the 3x3 head kernel
            f = nn.functional.pad(f, (0, max(0, 3 - f.shape[-1]), 0, max(0, 3 - f.shape[-2])))
        score = self.head(f)
        if score.shape[-1] != 1 or score.shape[-2] != 1:
            # patch sizes other than 192 leave a spatial map; reduce to a scalar
            score = score.mean(dim=(-1, -2), keepdim=True)
        return score.flatten(1).squeeze(1)


def init_weights(module: nn.Module, std: float = 0.02) -> None:
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
            nn.init.normal_(m.weight, 0.0, std)
            if m.bias is not None:
                nn.init.zeros_(m.bias)
        elif isinstance(m, nn.BatchNorm2d):
            nn.init.normal_(m.weight, 1.0, std)
            nn.init.zeros_(m.bias)


def generator_forward(model: Generator, patch: np.ndarray) -> np.ndarray:
    """Evaluation-mode forward pass on a single [0,1] gray patch."""
    if patch.ndim != 2:
        raise ValueError("patch must be 2-D")
    model.eval()
    with torch.no_grad():
        x = torch.from_numpy(np.asarray(patch, dtype=np.float32))[None, None]
        y = model(x)
    return y[0, 0].numpy().astype(np.float64)


def discriminator_forward(model: Discriminator, two_channel: np.ndarray) -> float:
    """Evaluation-mode score for a (H, W, 2) input: channel 0 the skeleton-
    like map, channel 1 the encoded orientation field."""
    if two_channel.ndim != 3 or two_channel.shape[-1] != 2:
        raise ValueError("input must be (H, W, 2)")
    model.eval()
    with torch.no_grad():
        x = torch.from_numpy(np.asarray(two_channel, dtype=np.float32).transpose(2, 0, 1))[None]
        return float(model(x).item())


def load_generator(path) -> Generator:
    """Build a generator from the spec stored in a checkpoint and load its
    weights."""
    payload = torch.load(path, map_location="cpu", weights_only=False)
    gen = Generator(GeneratorSpec(**payload["gen_spec"]))
    gen.load_state_dict(payload["generator"])
    return gen


def count_parameters(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters() if p.requires_grad)


def save_checkpoint(path, generator, discriminator, opt_g, opt_d, iteration: int) -> None:
    """Atomic checkpoint write (temp file + rename) with spec hashes."""
    payload = {
        "gen_spec": asdict(generator.spec),
        "disc_spec": asdict(discriminator.spec) if discriminator is not None else None,
        "gen_spec_hash": spec_hash(generator.spec),
        "disc_spec_hash": spec_hash(discriminator.spec) if discriminator is not None else None,
        "generator": generator.state_dict(),
        "discriminator": discriminator.state_dict() if discriminator is not None else None,
        "opt_g": opt_g.state_dict() if opt_g is not None else None,
        "opt_d": opt_d.state_dict() if opt_d is not None else None,
        "iteration": iteration,
    }
    tmp = f"{path}.tmp"
    torch.save(payload, tmp)
    os.replace(tmp, path)


def load_checkpoint(path, generator, discriminator=None, opt_g=None, opt_d=None) -> int:
    """Restore states; verifies the stored spec hash. Returns the iteration."""
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if payload["gen_spec_hash"] != spec_hash(generator.spec):
        raise ValueError("checkpoint generator spec hash mismatch")
    generator.load_state_dict(payload["generator"])
    if discriminator is not None and payload["discriminator"] is not None:
        if payload["disc_spec_hash"] != spec_hash(discriminator.spec):
            raise ValueError("checkpoint discriminator spec hash mismatch")
        discriminator.load_state_dict(payload["discriminator"])
    if opt_g is not None and payload["opt_g"] is not None:
        opt_g.load_state_dict(payload["opt_g"])
    if opt_d is not None and payload["opt_d"] is not None:
        opt_d.load_state_dict(payload["opt_d"])
    return payload["iteration"]
