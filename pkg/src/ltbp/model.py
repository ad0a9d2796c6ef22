"""Typed domain entities, validation, and lead-time derivation.

Lead times are whole calendar days between the order-entry date and the
request / confirmed-delivery / standard-delivery dates. The standard delivery
time (SDT) is the lead time a customer can expect by default; orders requested
earlier than the standard date are eligible for revenue management.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import date
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Mapping, Union

CENT = Decimal("0.01")
FACTOR = Decimal("0.000001")

Money = Decimal


def to_money(value: Union[int, float, str, Decimal]) -> Decimal:
    """Quantize to 2 fractional digits, half-even."""
    return Decimal(value).quantize(CENT, rounding=ROUND_HALF_EVEN)


def to_factor(value: Union[int, float, str, Decimal]) -> Decimal:
    """Quantize to 6 fractional digits, half-even (premiums, rho factors)."""
    return Decimal(value).quantize(FACTOR, rounding=ROUND_HALF_EVEN)


class AccountClass(enum.Enum):
    """Customer segment; drives the price adjustment factor."""

    KEY = "Key"
    REGULAR = "Regular"
    OTHERS = "Others"

    @classmethod
    def from_label(cls, label: str) -> "AccountClass":
        for member in cls:
            if member.value == label:
                return member
        raise ValueError(f"unknown account class label: {label!r}")

    def __str__(self) -> str:
        return self.value


# Revenue bands (currency units). Bands are closed at their upper bound and
# revenue above the top band maps to Key so the classification is total.
OTHERS_REVENUE_MAX = Decimal(5_000_000)
REGULAR_REVENUE_MAX = Decimal(10_000_000)

DEFAULT_RHO = {
    AccountClass.KEY: 0.1,
    AccountClass.REGULAR: 0.05,
    AccountClass.OTHERS: 0.025,
}


@dataclass(frozen=True, slots=True)
class Customer:
    customer_code: str
    account_class: AccountClass
    annual_revenue: Money
    region: str | None = None

    def __post_init__(self) -> None:
        if not self.customer_code:
            raise ValueError("customer_code must be non-empty")
        if self.annual_revenue < 0:
            raise ValueError(
                f"customer {self.customer_code}: annual_revenue must be >= 0"
            )


@dataclass(frozen=True, slots=True)
class Product:
    product_number: str
    basic_type: str
    product_line: str

    def __post_init__(self) -> None:
        if not self.product_number:
            raise ValueError("product_number must be non-empty")


@dataclass(frozen=True, slots=True)
class Order:
    """One customer order; the four dates are the source of all lead times."""

    order_number: str
    customer_code: str
    product_number: str
    quantity: int
    original_price: Money
    order_date: date
    customer_request_date: date
    customer_delivery_date: date
    standard_delivery_date: date

    def __post_init__(self) -> None:
        if not self.order_number:
            raise ValueError("order_number must be non-empty")
        if self.quantity <= 0:
            raise ValueError(f"order {self.order_number}: quantity must be > 0")
        if self.original_price <= 0:
            raise ValueError(f"order {self.order_number}: original_price must be > 0")
        if self.customer_request_date < self.order_date:
            raise ValueError(
                f"order {self.order_number}: customer_request_date precedes order_date"
            )
        if self.customer_delivery_date < self.order_date:
            raise ValueError(
                f"order {self.order_number}: customer_delivery_date precedes order_date"
            )
        if self.standard_delivery_date <= self.order_date:
            raise ValueError(
                f"order {self.order_number}: standard_delivery_date must be after order_date"
            )


@dataclass(frozen=True, slots=True)
class LeadTimes:
    """Whole-day lead times of one order; sdt is strictly positive."""

    olt_requested: int
    olt_confirmed: int
    sdt: int

    def __post_init__(self) -> None:
        if self.olt_requested < 0 or self.olt_confirmed < 0:
            raise ValueError("lead times must be non-negative")
        if self.sdt <= 0:
            raise ValueError("sdt must be > 0")


@dataclass(frozen=True)
class PricingConfig:
    """Weights, bounds, and the per-class adjustment factor table.

    ``convex_alpha`` must be <= 0: the convex baseline prices faster delivery
    above the original price, which requires a non-positive log coefficient.
    """

    alpha: float = 1.0
    beta: float = 1.0
    p_max: float = 2.0
    convex_alpha: float = -0.5
    rho_table: Mapping[AccountClass, float] = field(
        default_factory=lambda: dict(DEFAULT_RHO)
    )

    def __post_init__(self) -> None:
        if self.p_max <= 1:
            raise ValueError("p_max must be > 1")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if self.convex_alpha > 0:
            raise ValueError("convex_alpha must be <= 0")
        missing = [c for c in AccountClass if c not in self.rho_table]
        if missing:
            raise ValueError(f"rho_table missing classes: {missing}")
        for cls, rho in self.rho_table.items():
            if not 0 <= rho < 1:
                raise ValueError(f"rho for {cls} must be in [0, 1), got {rho}")


def derive_lead_times(order: Order) -> LeadTimes:
    """Calendar-day differences between the order date and each stage date."""
    base = order.order_date
    return LeadTimes(
        olt_requested=(order.customer_request_date - base).days,
        olt_confirmed=(order.customer_delivery_date - base).days,
        sdt=(order.standard_delivery_date - base).days,
    )


def rm_eligible(lt: LeadTimes) -> bool:
    """True when the order was requested earlier than the standard date."""
    return lt.sdt > lt.olt_requested


def adjustment_factor(account_class: AccountClass, config: PricingConfig) -> float:
    return config.rho_table[account_class]


def class_for_revenue(revenue: Union[int, float, Decimal]) -> AccountClass:
    """Classify by annual revenue band; revenue above the top band is Key."""
    if revenue < 0:
        raise ValueError(f"revenue must be >= 0, got {revenue}")
    if revenue <= OTHERS_REVENUE_MAX:
        return AccountClass.OTHERS
    if revenue <= REGULAR_REVENUE_MAX:
        return AccountClass.REGULAR
    return AccountClass.KEY


def class_matches_revenue(customer: Customer) -> bool:
    """Whether the declared class agrees with the revenue band table."""
    return class_for_revenue(customer.annual_revenue) is customer.account_class
