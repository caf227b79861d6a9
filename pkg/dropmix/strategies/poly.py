import logging

from dropmix.configuration import Configuration, apply_mix, size_bits
from dropmix.constants import (
    GAMMA,
    PATH_DIRECT,
    PATH_LAMBDA,
    PATH_POLY,
    PATH_POWER_OF_TWO,
    POLY_THRESHOLD,
    POWER_OF_TWO,
)
from dropmix.synthesis_base import (
    MixingStrategy,
    SynthesisError,
    lambda_mix_subset,
    mix_power_of_two,
    near_final_partition,
    poly_step,
    same_parity_pairs,
)

logger = logging.getLogger(__name__)


class Poly(MixingStrategy):
    """
    The bounded-length strategy.

    Power-of-two sizes are mixed directly. Below the polynomial threshold
    the configuration is (λ)-mixed by divide and conquer and finished
    through a near-final pair; from the threshold on, polynomial fragments
    are repeated until the configuration is near-final.
    """

    name = "Poly"

    def _populate(self, E: Configuration) -> None:
        n = E.n
        s = size_bits(self.initial)
        if self.ctx.invariant_kind == POWER_OF_TWO:
            self.path = PATH_POWER_OF_TWO
            logger.info("mixing %d droplets as a power-of-two block", n)
            self.extend_steps(mix_power_of_two(E))
            self.check_ceiling(288 * n**2 * s**2)
            return

        if near_final_partition(E) is not None:
            self.path = PATH_DIRECT
            logger.info("%s is near-final", E)
            self.finish_near_final()
            self.check_ceiling(self.ceiling())
            return

        if n >= POLY_THRESHOLD:
            self.path = PATH_POLY
            logger.info("mixing %d droplets by polynomial fragments", n)
            while near_final_partition(self.state) is None:
                self.extend_steps(poly_step(self.state, self.ctx))
            self.finish_near_final()
            self.check_ceiling(
                2**14 * GAMMA**2 * n**2 * s**2
                + 64 * GAMMA**2 * n * s
                + self.ceiling()
            )
            return

        self.path = PATH_LAMBDA
        logger.info("(λ)-mixing %d droplets", n)
        self.extend_steps(lambda_mix_subset(self.state, self.state, self.ctx))
        if near_final_partition(self.state) is None:
            x, y = self._near_final_pair()
            self.mix(x, y)
        if not self.finish_near_final():
            raise SynthesisError("no near-final partition after (λ)-mixing", self.state)
        self.check_ceiling(float(8 * n**3 * s) ** n + self.ceiling())

    def _near_final_pair(self):
        for x, y in same_parity_pairs(self.state):
            if near_final_partition(apply_mix(self.state, x, y)) is not None:
                logger.debug("near-final pair (%d, %d)", x, y)
                return x, y
        raise SynthesisError("(λ)-mixed configuration has no near-final pair", self.state)
