"""Scheme labels shared by the exact, approximate and selection layers."""

UL_ZF = "UL-ZF"
UL_MRC = "UL-MRC"
DL_ZF_LT = "DL-ZF-LT"
DL_ZF_ST = "DL-ZF-ST"
DL_MRT_LT = "DL-MRT-LT"
DL_MRT_ST = "DL-MRT-ST"

SCHEMES = (UL_ZF, UL_MRC, DL_ZF_LT, DL_ZF_ST, DL_MRT_LT, DL_MRT_ST)
UPLINK = (UL_ZF, UL_MRC)


def normalize_scheme(name: str) -> str:
    key = str(name).strip().upper().replace("_", "-")
    if key not in SCHEMES:
        raise ValueError(f"unknown scheme {name!r}; expected one of {', '.join(SCHEMES)}")
    return key


def scheme_for(link: str, beamformer: str, normalization: str | None = None) -> str:
    """Map (link, beamformer, normalization) to a scheme label."""
    link = link.lower()
    beamformer = beamformer.lower()
    if link == "uplink":
        if beamformer not in ("zf", "mrc"):
            raise ValueError(f"uplink supports zf or mrc, not {beamformer!r}")
        return UL_ZF if beamformer == "zf" else UL_MRC
    if link == "downlink":
        if beamformer not in ("zf", "mrt"):
            raise ValueError(f"downlink supports zf or mrt, not {beamformer!r}")
        if normalization not in ("long", "short"):
            raise ValueError(f"downlink needs normalization long|short, got {normalization!r}")
        suffix = "LT" if normalization == "long" else "ST"
        return f"DL-{beamformer.upper()}-{suffix}"
    raise ValueError(f"unknown link {link!r}")
