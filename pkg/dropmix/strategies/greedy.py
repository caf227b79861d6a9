import logging

from dropmix.configuration import Configuration, size_bits
from dropmix.constants import PATH_GREEDY, PATH_POWER_OF_TWO, POWER_OF_TWO
from dropmix.synthesis_base import (
    MixingStrategy,
    find_safe_or_nearfinal_pair,
    mix_power_of_two,
    near_final_partition,
)

logger = logging.getLogger(__name__)


class Greedy(MixingStrategy):
    """Mixes the pair the multiplicity and parity case analysis picks until
    the configuration is near-final. Used as a baseline for the bounded
    strategy."""

    name = "Greedy"

    def _populate(self, E: Configuration) -> None:
        n = E.n
        s = size_bits(self.initial)
        if self.ctx.invariant_kind == POWER_OF_TWO:
            self.path = PATH_POWER_OF_TWO
            self.extend_steps(mix_power_of_two(E))
            self.check_ceiling(288 * n**2 * s**2)
            return
        self.path = PATH_GREEDY
        logger.info("greedy mixing of %d droplets", n)
        while near_final_partition(self.state) is None:
            choice = find_safe_or_nearfinal_pair(self.state, self.ctx)
            logger.debug("%s: mixing (%d, %d)", choice.case, choice.x, choice.y)
            self.mix(choice.x, choice.y)
        self.finish_near_final()
