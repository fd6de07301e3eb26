package shop.catalog;

import shop.common.Identified;
import shop.common.Money;

public class Product implements Identified {
    String sku;
    String title;
    Money basePrice;
    ProductKind kind;

    public Product(String sku, String title, Money basePrice, ProductKind kind) {
        this.sku = sku;
        this.title = title;
        this.basePrice = basePrice;
        this.kind = kind;
    }

    public String id() {
        return sku;
    }

    public Money basePrice() {
        return basePrice;
    }
}
