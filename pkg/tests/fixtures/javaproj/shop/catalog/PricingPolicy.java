package shop.catalog;

import shop.common.Money;

public interface PricingPolicy {
    Money priceOf(Product product, int quantity);
}
