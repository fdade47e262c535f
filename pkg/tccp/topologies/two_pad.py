"""Two connecting pads: Q1 - P1 - P2 - Q2 with the coupler between the pads."""

from typing import Dict, Mapping, Optional, Tuple

from ..quantizer import InverseBlock, symmetric_two_pad_inverse
from .base import Topology


class TwoPadTopology(Topology):
    """Symmetric two-pad layout; the coupler sees both pads equally."""

    name = "two-pad"
    description = "Q1-P1-C-P2-Q2, coupler capacitively split across two pads"
    capacitance_names = ("cQG", "cPG", "cCG", "cQP", "cPC", "cP12")
    passive_nodes = ("P1", "P2")

    def node_order(self) -> Tuple[str, ...]:
        return ("Q1", "P1", "C", "P2", "Q2")

    def ground_caps(self, caps: Mapping[str, float]) -> Dict[str, float]:
        return {"Q1": caps["cQG"], "P1": caps["cPG"], "C": caps["cCG"],
                "P2": caps["cPG"], "Q2": caps["cQG"]}

    def mutual_caps(self, caps: Mapping[str, float]) -> Dict[Tuple[str, str], float]:
        return {("P1", "Q1"): caps["cQP"], ("P2", "Q2"): caps["cQP"],
                ("C", "P1"): caps["cPC"], ("C", "P2"): caps["cPC"],
                ("P1", "P2"): caps["cP12"]}

    def closed_form_inverse(self, caps: Mapping[str, float]) -> Optional[InverseBlock]:
        self.check_caps(caps)
        return symmetric_two_pad_inverse(**{k: caps[k] for k in self.capacitance_names})


class AsymmetricTwoPadTopology(TwoPadTopology):
    """Two-pad layout with the coupler attached to the first pad only."""

    name = "two-pad-asym"
    description = "Q1-P1-P2-Q2 with the coupler hanging on P1 only"

    def mutual_caps(self, caps: Mapping[str, float]) -> Dict[Tuple[str, str], float]:
        return {("P1", "Q1"): caps["cQP"], ("P2", "Q2"): caps["cQP"],
                ("C", "P1"): caps["cPC"], ("P1", "P2"): caps["cP12"]}

    def closed_form_inverse(self, caps: Mapping[str, float]) -> Optional[InverseBlock]:
        return None
