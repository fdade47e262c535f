"""One shared connecting pad between both qubits and the coupler."""

from typing import Dict, Mapping, Optional, Tuple

from ..quantizer import InverseBlock, symmetric_one_pad_inverse
from .base import Topology


class OnePadTopology(Topology):
    """Symmetric one-pad layout: Q1 and Q2 both couple to P, C hangs on P."""

    name = "one-pad"
    description = "Q1-P-Q2 with the coupler attached to the shared pad"
    capacitance_names = ("cQG", "cPG", "cCG", "cQP", "cPC")
    passive_nodes = ("P",)

    def node_order(self) -> Tuple[str, ...]:
        return ("Q1", "P", "C", "Q2")

    def ground_caps(self, caps: Mapping[str, float]) -> Dict[str, float]:
        return {"Q1": caps["cQG"], "P": caps["cPG"], "C": caps["cCG"], "Q2": caps["cQG"]}

    def mutual_caps(self, caps: Mapping[str, float]) -> Dict[Tuple[str, str], float]:
        return {("P", "Q1"): caps["cQP"], ("P", "Q2"): caps["cQP"], ("C", "P"): caps["cPC"]}

    def closed_form_inverse(self, caps: Mapping[str, float]) -> Optional[InverseBlock]:
        self.check_caps(caps)
        return symmetric_one_pad_inverse(**{k: caps[k] for k in self.capacitance_names})


class AsymmetricOnePadTopology(OnePadTopology):
    """One-pad layout with the coupler sandwiched between the pad and Q2."""

    name = "one-pad-asym"
    description = "Q1-P-Q2 with the coupler between the pad and Q2"
    capacitance_names = ("cQG", "cPG", "cCG", "cQP", "cPC", "cCQ")

    def mutual_caps(self, caps: Mapping[str, float]) -> Dict[Tuple[str, str], float]:
        return {("P", "Q1"): caps["cQP"], ("P", "Q2"): caps["cQP"],
                ("C", "P"): caps["cPC"], ("C", "Q2"): caps["cCQ"]}

    def closed_form_inverse(self, caps: Mapping[str, float]) -> Optional[InverseBlock]:
        return None
