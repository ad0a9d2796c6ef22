from datetime import date
from decimal import Decimal

import pytest

from ltbp.ingest import (
    DanglingReference,
    DuplicateIdentifier,
    GeneratorConfig,
    HeaderMismatch,
    NonPositiveSdt,
    UnknownClassLabel,
    generate_synthetic,
    load_customers,
    load_dataset,
    load_orders,
    load_products,
    validate_dataset,
    write_dataset,
    write_manifest,
)
from ltbp.model import AccountClass, derive_lead_times, rm_eligible

CUSTOMER_HEADER = "customer_code,account_class,annual_revenue,region\n"
PRODUCT_HEADER = "product_number,basic_type,product_line\n"
ORDER_HEADER = (
    "order_number,customer_code,product_number,quantity,original_price,"
    "order_date,customer_request_date,customer_delivery_date,"
    "standard_delivery_date\n"
)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture
def customer_file(tmp_path):
    return write(
        tmp_path / "customers.csv",
        CUSTOMER_HEADER + "C001,Key,50000000,EMEA\nC002,Others,100000,\n",
    )


@pytest.fixture
def product_file(tmp_path):
    return write(tmp_path / "products.csv", PRODUCT_HEADER + "P01,BT-A,PL-1\n")


class TestLoadCustomers:
    def test_field_by_field_parse(self, customer_file):
        customers = load_customers(customer_file)
        first = customers[0]
        assert first.customer_code == "C001"
        assert first.account_class is AccountClass.KEY
        assert first.annual_revenue == Decimal("50000000.00")
        assert first.region == "EMEA"
        assert customers[1].region is None

    def test_unknown_class_label(self, tmp_path):
        path = write(
            tmp_path / "c.csv", CUSTOMER_HEADER + "C001,Platinum,1000,EMEA\n"
        )
        with pytest.raises(UnknownClassLabel) as excinfo:
            load_customers(path)
        assert excinfo.value.line == 2
        assert excinfo.value.column == "account_class"

    def test_header_only_file(self, tmp_path):
        path = write(tmp_path / "c.csv", CUSTOMER_HEADER)
        assert load_customers(path) == []

    def test_duplicate_code_rejected(self, tmp_path):
        path = write(
            tmp_path / "c.csv",
            CUSTOMER_HEADER + "C001,Key,50000000,\nC001,Key,50000000,\n",
        )
        with pytest.raises(DuplicateIdentifier):
            load_customers(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(Exception, match="no such file"):
            load_customers(tmp_path / "absent.csv")

    def test_header_mismatch(self, tmp_path):
        path = write(tmp_path / "c.csv", "a,b\n1,2\n")
        with pytest.raises(HeaderMismatch):
            load_customers(path)

    def test_skip_invalid_collects_issues(self, tmp_path):
        path = write(
            tmp_path / "c.csv",
            CUSTOMER_HEADER
            + "C001,Key,50000000,\nC002,Platinum,10,\nC003,Others,abc,\n",
        )
        issues = []
        customers = load_customers(path, skip_invalid=True, issues=issues)
        assert [c.customer_code for c in customers] == ["C001"]
        assert len(issues) == 2

    def test_class_revenue_mismatch_warns_but_keeps_declared(self, tmp_path, caplog):
        path = write(tmp_path / "c.csv", CUSTOMER_HEADER + "C001,Key,1000,\n")
        with caplog.at_level("WARNING"):
            customers = load_customers(path)
        assert customers[0].account_class is AccountClass.KEY
        assert any("does not match revenue" in r.message for r in caplog.records)


class TestLoadOrders:
    def orders_text(self, row):
        return ORDER_HEADER + row + "\n"

    def test_valid_row(self, customer_file, product_file, tmp_path):
        customers = load_customers(customer_file)
        products = load_products(product_file)
        path = write(
            tmp_path / "orders.csv",
            self.orders_text(
                "O1,C001,P01,5,123.45,2020-01-01,2020-01-11,2020-01-06,2020-01-21"
            ),
        )
        (order,) = load_orders(path, customers, products)
        assert order.quantity == 5
        assert order.original_price == Decimal("123.45")
        assert order.order_date == date(2020, 1, 1)
        lt = derive_lead_times(order)
        assert (lt.olt_requested, lt.olt_confirmed, lt.sdt) == (10, 5, 20)

    def test_dangling_customer(self, customer_file, product_file, tmp_path):
        customers = load_customers(customer_file)
        products = load_products(product_file)
        path = write(
            tmp_path / "orders.csv",
            self.orders_text(
                "O1,NOPE,P01,5,10.00,2020-01-01,2020-01-11,2020-01-06,2020-01-21"
            ),
        )
        with pytest.raises(DanglingReference):
            load_orders(path, customers, products)

    def test_standard_date_equal_to_order_date(
        self, customer_file, product_file, tmp_path
    ):
        customers = load_customers(customer_file)
        products = load_products(product_file)
        path = write(
            tmp_path / "orders.csv",
            self.orders_text(
                "O1,C001,P01,5,10.00,2020-01-01,2020-01-11,2020-01-06,2020-01-01"
            ),
        )
        with pytest.raises(NonPositiveSdt):
            load_orders(path, customers, products)


class TestRoundTrip:
    def test_write_then_load_is_identity(self, small_dataset, tmp_path):
        write_dataset(small_dataset, tmp_path)
        reloaded = load_dataset(
            tmp_path / "orders.csv",
            tmp_path / "customers.csv",
            tmp_path / "products.csv",
        )
        assert reloaded == small_dataset

    def test_generated_dataset_round_trips(self, tmp_path):
        dataset = generate_synthetic(
            GeneratorConfig(seed=7, n_customers=12, n_orders=60, n_products=4)
        )
        write_dataset(dataset, tmp_path)
        reloaded = load_dataset(
            tmp_path / "orders.csv",
            tmp_path / "customers.csv",
            tmp_path / "products.csv",
        )
        assert reloaded == dataset


class TestGenerator:
    def test_equal_seeds_equal_datasets(self):
        config = GeneratorConfig(seed=42, n_customers=15, n_orders=120, n_products=4)
        assert generate_synthetic(config) == generate_synthetic(config)

    def test_different_seeds_differ_in_order_numbers(self):
        a = generate_synthetic(GeneratorConfig(seed=1, n_customers=5, n_orders=30))
        b = generate_synthetic(GeneratorConfig(seed=2, n_customers=5, n_orders=30))
        assert [o.order_number for o in a.orders] != [o.order_number for o in b.orders]

    def test_counts_match_config(self):
        config = GeneratorConfig(seed=3, n_customers=23, n_orders=111, n_products=7)
        dataset = generate_synthetic(config)
        assert len(dataset.customers) == 23
        assert len(dataset.orders) == 111
        assert len(dataset.products) == 7

    def test_invariants_hold(self):
        dataset = generate_synthetic(
            GeneratorConfig(seed=11, n_customers=30, n_orders=400)
        )
        validate_dataset(dataset)  # uniqueness + referential integrity
        for order in dataset.orders:
            lt = derive_lead_times(order)
            assert lt.sdt > 0 and lt.olt_confirmed >= 1

    def test_class_fractions_ordered(self):
        dataset = generate_synthetic(GeneratorConfig(seed=42, n_orders=6000))
        totals = {cls: 0 for cls in AccountClass}
        eligible = {cls: 0 for cls in AccountClass}
        class_of = {c.customer_code: c.account_class for c in dataset.customers}
        for order in dataset.orders:
            cls = class_of[order.customer_code]
            totals[cls] += 1
            if rm_eligible(derive_lead_times(order)):
                eligible[cls] += 1
        fraction = {cls: eligible[cls] / totals[cls] for cls in AccountClass}
        assert (
            fraction[AccountClass.OTHERS]
            >= fraction[AccountClass.REGULAR]
            >= fraction[AccountClass.KEY]
        )

    def test_class_mix_must_sum_to_one(self):
        with pytest.raises(ValueError):
            GeneratorConfig(
                class_mix={
                    AccountClass.KEY: 0.5,
                    AccountClass.REGULAR: 0.2,
                    AccountClass.OTHERS: 0.2,
                }
            )

    def test_manifest_written(self, tmp_path):
        config = GeneratorConfig(seed=9, n_customers=5, n_orders=10)
        write_manifest(config, tmp_path / "manifest.json")
        text = (tmp_path / "manifest.json").read_text()
        assert '"seed": 9' in text
        assert '"Key"' in text
