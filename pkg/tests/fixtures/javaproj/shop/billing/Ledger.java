package shop.billing;

import shop.common.Money;

public interface Ledger {
    void record(Invoice invoice);

    Money balance();
}
