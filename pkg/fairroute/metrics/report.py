"""Per-run metric totals and their JSON form"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Union

from ..errors import MetricsError, WritingError
from ..world.entities import CustomerRequest, RequestStatus, Scenario
from .fairness import AreaPartition, area_statistics, customer_fairness, customer_fairness_raw, provider_fairness
from .utility import AwardEvent

logger = logging.getLogger(__name__)


@dataclass
class MetricsReport:
    """Totals for one simulation run"""

    total_utility: float = 0.0
    provider_fairness: float = 0.0
    customer_fairness: float = 0.0
    total_distance_m: float = 0.0
    per_provider_utility: Dict[int, float] = field(default_factory=dict)
    per_area_stat: Dict[int, float] = field(default_factory=dict)
    served_count: int = 0
    expired_count: int = 0
    customer_fairness_raw: float = 0.0
    scenario: str = Scenario.NON_COMPLIANCE.value

    def __post_init__(self):
        if self.provider_fairness < 0 or self.customer_fairness < 0:
            raise MetricsError("Fairness variances cannot be negative")

    @classmethod
    def compute(
        cls,
        scenario: Scenario,
        ledgers: Mapping[int, float],
        requests: Sequence[CustomerRequest],
        events: Iterable[AwardEvent],
        total_distance_m: float,
        horizon: float,
        partition: Optional[AreaPartition] = None
    ) -> 'MetricsReport':
        """Build the report at the horizon from ledgers, requests and the award log

        ``total_utility`` is the sum of the ledgers, which the simulator keeps
        equal to the award log total.
        """
        events = list(events)
        per_provider = {pid: float(ledgers[pid]) for pid in sorted(ledgers)}

        if per_provider:
            provider_var = provider_fairness(per_provider)
        else:
            provider_var = 0.0

        return cls(
            total_utility=float(sum(per_provider.values())),
            provider_fairness=provider_var,
            customer_fairness=customer_fairness(scenario, partition, requests, events, horizon),
            customer_fairness_raw=customer_fairness_raw(scenario, partition, requests, events, horizon),
            total_distance_m=float(total_distance_m),
            per_provider_utility=per_provider,
            per_area_stat=area_statistics(scenario, requests, events, horizon, partition),
            served_count=sum(1 for r in requests if r.status == RequestStatus.SERVED),
            expired_count=sum(1 for r in requests if r.status == RequestStatus.EXPIRED),
            scenario=scenario.value,
        )

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready dictionary with the fixed report field names"""
        return {
            'scenario': self.scenario,
            'total_utility': self.total_utility,
            'provider_fairness': self.provider_fairness,
            'customer_fairness': self.customer_fairness,
            'customer_fairness_raw': self.customer_fairness_raw,
            'total_distance_m': self.total_distance_m,
            'per_provider': {str(k): v for k, v in sorted(self.per_provider_utility.items())},
            'per_area': {str(k): v for k, v in sorted(self.per_area_stat.items())},
            'served': self.served_count,
            'expired': self.expired_count,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'MetricsReport':
        try:
            return cls(
                total_utility=float(data['total_utility']),
                provider_fairness=float(data['provider_fairness']),
                customer_fairness=float(data['customer_fairness']),
                customer_fairness_raw=float(data.get('customer_fairness_raw', 0.0)),
                total_distance_m=float(data['total_distance_m']),
                per_provider_utility={int(k): float(v) for k, v in data.get('per_provider', {}).items()},
                per_area_stat={int(k): float(v) for k, v in data.get('per_area', {}).items()},
                served_count=int(data.get('served', 0)),
                expired_count=int(data.get('expired', 0)),
                scenario=str(data.get('scenario', Scenario.NON_COMPLIANCE.value)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise MetricsError(f"Malformed metrics report: {e}") from e

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def save(self, path: Union[str, Path]) -> None:
        """Write the report as UTF-8 JSON

        Raises:
            WritingError: If the file cannot be written
        """
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(self.to_json() + "\n", encoding='utf-8')
        except OSError as e:
            raise WritingError(f"Failed to write report {path}: {e}") from e
        logger.info(f"Metrics report written to {path}")

    def __str__(self) -> str:
        lines = [
            "Run Metrics:",
            f"  Total Utility: {self.total_utility:,.2f}",
            f"  Provider Fairness (var): {self.provider_fairness:,.4f}",
            f"  Customer Fairness (var): {self.customer_fairness:,.4f}",
            f"  Total Distance: {self.total_distance_m:,.0f} m",
            f"  Served: {self.served_count:,}  Expired: {self.expired_count:,}",
        ]
        return '\n'.join(lines)
